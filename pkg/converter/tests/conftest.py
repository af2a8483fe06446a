import sys
from pathlib import Path

# The converter is a standalone script, not an installed package; make it
# importable when pytest runs from the repository root.
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
