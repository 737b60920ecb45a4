"""FDA-MIMO radar workbench: barrage/burst jamming simulation, two-step GoDec
separation and joint range-angle estimation."""

__version__ = "0.1.0"
