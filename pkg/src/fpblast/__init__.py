"""Bit-blasting IEEE-754 floating-point arithmetic into bit-vector circuits."""
