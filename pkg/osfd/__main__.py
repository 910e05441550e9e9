import sys

from osfd.cli import main

sys.exit(main())
