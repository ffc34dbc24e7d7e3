import sys

from lfdepth.cli import main

sys.exit(main())
