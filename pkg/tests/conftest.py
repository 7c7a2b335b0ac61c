import sys
from pathlib import Path

# Make the shared fixture-data module importable from any test.
sys.path.insert(0, str(Path(__file__).parent))
