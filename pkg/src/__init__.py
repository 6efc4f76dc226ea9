"""Relativistic Vlasov-Maxwell simulation and asymptotics verification."""
