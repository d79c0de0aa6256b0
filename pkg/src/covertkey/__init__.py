"""Covert secret-key generation over state-dependent channels with an active warden.

Submodules
----------
probcore
    Distributions, types and divergences.
channel
    State-dependent channels, hypothesis checks and sampling.
rates
    Closed-form covert throughput and converse formulas.
oneshot
    Random codebooks, likelihood encoder, MMI decoder and their bounds.
estimator
    Secret probing, halting and state-weight estimation; code-size selection.
protocol
    The assembled protocol, metrics and derandomization.
concentration
    Concentration bounds with Monte-Carlo checks.
"""
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
