import sys

from figure_eight.cli import main

sys.exit(main())
