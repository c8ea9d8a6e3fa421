import sys

from superfwm.cli import main

sys.exit(main())
