"""
Behavioral Controller Synthesis - Core Modules
"""

__version__ = "1.0.0"
