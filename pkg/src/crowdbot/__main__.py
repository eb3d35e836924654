import sys

from crowdbot.cli import main

sys.exit(main())
