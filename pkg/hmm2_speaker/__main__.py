import sys

from hmm2_speaker.apps.console_app import main


sys.exit(main())
