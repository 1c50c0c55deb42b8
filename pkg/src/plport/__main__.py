from plport.cli import main
import sys

sys.exit(main())
