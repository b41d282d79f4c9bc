import sys

from flipcal.cli import main

sys.exit(main())
