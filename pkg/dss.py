#!/usr/bin/env python3
"""
Point d'entrée du pipeline DSS.
Usage: python dss.py <sous-commande> --config configs/synthetic.env
"""
import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
