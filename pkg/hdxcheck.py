#!/usr/bin/env python3
"""
hdx-calculus command-line entry point.

    python hdxcheck.py gen --kind perturbed-product --sizes 3,2,2 --gamma 0.05
    python hdxcheck.py certify hdx_out/complex.json --top 5
    python hdxcheck.py check default
"""

import sys
from pathlib import Path

project_root = Path(__file__).resolve().parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv

load_dotenv()

from hdx.cli import main

if __name__ == "__main__":
    main()
