"""Utilitaires"""
from app.utils.serializers import read_array_bundle, write_array_bundle, write_csv, write_json

__all__ = ["read_array_bundle", "write_array_bundle", "write_csv", "write_json"]
