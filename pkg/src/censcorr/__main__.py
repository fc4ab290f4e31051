import sys

from censcorr.cli import main

sys.exit(main())
