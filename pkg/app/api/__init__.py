"""API module"""

