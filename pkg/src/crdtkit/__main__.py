import sys

from crdtkit.cli import main

sys.exit(main())
