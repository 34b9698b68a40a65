import sys

from cuboidpack.cli import main

sys.exit(main())
