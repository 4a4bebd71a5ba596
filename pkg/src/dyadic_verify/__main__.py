"""
Command line entry point for Dyadic Verify.
Supports both:
- python -m dyadic_verify
- python src/dyadic_verify/__main__.py
"""

import sys

try:
    # When executed as a module: python -m dyadic_verify
    from .cli import main
except ImportError:
    # When executed directly as a script
    import os
    sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
    from dyadic_verify.cli import main

if __name__ == '__main__':
    sys.exit(main())
