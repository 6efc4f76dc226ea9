"""Numerical kernels: kinematics, fields, characteristics, particles and limits."""
