"""Recursive preferences over temporal lotteries."""
__version__ = "0.1.0"
