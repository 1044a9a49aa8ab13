import sys

from oakernel.cli import main

sys.exit(main())
