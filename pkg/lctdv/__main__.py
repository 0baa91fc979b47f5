import sys

import dotenv

from lctdv.cli import main

dotenv.load_dotenv()
sys.exit(main(sys.argv[1:]))
