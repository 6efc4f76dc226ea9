"""Tests for the run catalog model."""
from domain.models.run_record import RunRecord, RunStatus


class TestRunRecord:
    """Tests for RunRecord transitions."""

    def _record(self) -> RunRecord:
        return RunRecord(run_dir="/runs/x", config_digest="f" * 64, seed=1)

    def test_defaults(self):
        """Test that new records are pending."""
        record = self._record()

        assert record.status is RunStatus.PENDING
        assert record.error_message is None
        assert record.is_analyzable is False

    def test_running_clears_error(self):
        """Test that a rerun forgets the previous error."""
        record = self._record().mark_as_failed("boom").mark_as_running()

        assert record.status is RunStatus.RUNNING
        assert record.error_message is None

    def test_completed_and_analyzed_are_analyzable(self):
        """Test which states admit analysis."""
        completed = self._record().mark_as_completed()

        assert completed.is_analyzable is True
        assert completed.mark_as_analyzed().is_analyzable is True
        assert self._record().mark_as_failed("x").is_analyzable is False

    def test_transitions_return_copies(self):
        """Test that transitions leave the original untouched."""
        record = self._record()

        record.mark_as_completed()

        assert record.status is RunStatus.PENDING
