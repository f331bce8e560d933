import sys

from lsmove.cli import main

sys.exit(main())
