"""Test suite for rvm-asymptotics."""
