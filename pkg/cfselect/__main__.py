import sys

from cfselect.cli import main

sys.exit(main())
