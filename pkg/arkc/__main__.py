import sys

from arkc.cli import main

sys.exit(main())
