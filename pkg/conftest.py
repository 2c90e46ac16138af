"""
Test path setup for pytest, mirroring main.py
"""

import os
import sys
from pathlib import Path

project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src"))

os.environ.setdefault("PROJECT_ROOT", str(project_root))
os.environ.setdefault("CONFIG_PATH", str(project_root / "config"))

collect_ignore = ["examples", "main.py"]
