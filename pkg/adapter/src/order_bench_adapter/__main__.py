import sys

from order_bench_adapter.cli import main

sys.exit(main())
