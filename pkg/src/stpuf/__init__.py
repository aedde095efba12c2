"""Behavioral simulation of Schmitt-Trigger recycling sensors and
inverter/ST arbiter and SRAM PUFs, with Hamming-distance metrics and an
SP800-22 statistical subset."""

__version__ = "0.1.0"
