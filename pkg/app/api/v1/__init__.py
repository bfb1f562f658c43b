"""API v1"""

