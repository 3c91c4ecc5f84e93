import sys

from dmed.harness.cli import main

sys.exit(main())
