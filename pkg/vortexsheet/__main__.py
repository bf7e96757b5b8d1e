import sys

from vortexsheet.main import main

sys.exit(main())
