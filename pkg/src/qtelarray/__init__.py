"""Memory-assisted quantum telescope array simulator.

Subpackages and modules:

- ``qcore``: state vectors and ensembles, gates, Fock modes, measurement
- ``source``: array geometry, intensities, visibilities, photonic states
- ``codec``: time/frequency codebook and the memory encoding pipeline
- ``netdecode``: entanglement-assisted decoding and pairwise readout
- ``imaging``: QFT versus classical intensity reconstruction
- ``transfer``: photon-detection-based state transfer and network formulas
- ``cli``: reproducible experiment runner with CSV output
"""

__version__ = "0.1.0"
