import sys

from irgc.cli import main

sys.exit(main())
