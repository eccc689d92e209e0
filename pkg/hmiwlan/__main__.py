import sys

from hmiwlan.cli import dispatch

sys.exit(dispatch())
