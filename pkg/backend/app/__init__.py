# Spin-state amplification simulator
__version__ = "1.0.0"
