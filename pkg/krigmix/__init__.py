"""
krigmix - Bayesian kriging by iterative normal-mixture importance sampling
"""
__version__ = "0.1.0"
