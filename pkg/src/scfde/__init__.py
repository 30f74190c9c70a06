"""Link-level simulation of frequency-domain equalizers for DFT-precoded OFDM.

Implements conventional and widely linear {ZF, MMSE} x {linear, decision
feedback} receivers over i.i.d. Rayleigh block-fading channels, the
closed-form limiting post-SNR references, and a deterministic Monte
Carlo BER/gap harness with a CSV/JSON command-line front end.
"""

__version__ = "0.1.0"
