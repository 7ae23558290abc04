import sys

from hcpy.cli import main

sys.exit(main())
