#!/usr/bin/env -S uv run --script
# /// script
# requires-python = ">=3.14"
# dependencies = ["typer>=0.21.0", "jsonschema>=4.23", "numpy>=2.2", "scipy>=1.15"]
# ///

import sys

from hermap import main

if __name__ == "__main__":
    sys.exit(main())
