import sys

from weavetex_pybridge.server import main

sys.exit(main())
