"""
Shared pytest setup: backend modules use flat imports, so the backend
directory goes on sys.path for every test session.
"""

import sys
from pathlib import Path

BACKEND_DIR = Path(__file__).parent / "backend"
if str(BACKEND_DIR) not in sys.path:
    sys.path.insert(0, str(BACKEND_DIR))
