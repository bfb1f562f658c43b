"""Endpoints API v1"""

