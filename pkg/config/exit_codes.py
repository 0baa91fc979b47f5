SUCCESS = 0
VERIFICATION_FAILED = 1
INPUT_ERROR = 2
MISSING_CONFIG_FILE = 2
CORRUPTED_CONFIG_FILE = 2
