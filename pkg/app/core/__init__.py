"""Core module - Configuration, erreurs et logging"""
