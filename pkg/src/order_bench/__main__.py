import sys

from order_bench.cli import main

sys.exit(main())
