"""Markov random words: letter-count covariance, Young tableau shapes,
and their Brownian and random-matrix limit laws."""

__version__ = "0.1.0"
