import sys

from magtrans.cli import main

sys.exit(main())
