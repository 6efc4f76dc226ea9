"""Run directory layout and binary format constants."""

CONFIG_FILE = "config.ini"
METADATA_FILE = "metadata.json"
DIAGNOSTICS_FILE = "diagnostics.csv"
TRACERS_FILE = "tracers.csv"
FIELDS_DIR = "fields"
MOMENTUM_DIR = "momentum"
DENSITY_DIR = "density"
ANALYSIS_DIR = "analysis"
REPORT_FILE = "report.json"

FIELD_MAGIC = b"RVMF"
FIELD_VERSION = 2  # bodies in x-fastest order since version 2
FIELD_HEADER_FORMAT = "<4sIIddd"  # magic, version, cells, extent, time, dt

GRID_MAGIC = b"RVMH"
GRID_VERSION = 2
GRID_HEADER_FORMAT = "<4sI16sIIddi"  # magic, version, tag, nodes, components, half_width, spacing, species

FIELD_DIAGNOSTIC_COLUMNS = (
    "time",
    "supE_cone",
    "supB_cone",
    "supE",
    "supB",
    "divE_res",
    "divB_res",
    "energy",
    "supDE_cone",
    "supDB_cone",
)

RUN_DIAGNOSTIC_COLUMNS = (
    "sup_rho",
    "sup_j",
    "radius_x",
    "radius_y",
    "beta",
    "weight_drift",
    "continuity_res",
)

TRACER_COLUMNS = (
    "tracer_id",
    "t",
    "X1", "X2", "X3",
    "P1", "P2", "P3",
    "Y1", "Y2", "Y3",
    "label1", "label2", "label3",
)


def field_snapshot_name(index: int) -> str:
    return f"fields_{index:03d}.rvmf"


def momentum_snapshot_name(species: int, index: int) -> str:
    return f"F_s{species}_{index:03d}.rvmh"


def initial_momentum_name(species: int) -> str:
    return f"F_s{species}_init.rvmh"


def density_snapshot_name(index: int) -> str:
    return f"rho_{index:03d}.npy"
