#!/usr/bin/env python
"""Script to run the group recommendation pipeline from a checkout."""
import sys
from pathlib import Path

# Get the directory where this script is located
repo_dir = Path(__file__).resolve().parent

# Add repo directory to Python path
sys.path.insert(0, str(repo_dir))

from grouprec.commands import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
