import sys

from tbforge.cli import main

sys.exit(main())
