import os
from dotenv import load_dotenv

load_dotenv()

class Config:

    ENV = os.getenv("RGMIS_ENV", "development")

    # All-permutation modes refuse graphs above this many vertices (9! = 362,880 orderings)
    EXHAUSTIVE_BOUND = int(os.getenv("RGMIS_EXHAUSTIVE_BOUND", "9"))
    # Dangerous-path probability oracle enumerates (n - t)! completions
    ORACLE_BOUND = int(os.getenv("RGMIS_ORACLE_BOUND", "9"))
    # Above this n, path counts switch from explicit listing to the DP
    LIST_ENUMERATION_MAX_N = int(os.getenv("RGMIS_LIST_ENUMERATION_MAX_N", "10"))

    # Process pool for Monte Carlo trials and permutation blocks
    WORKERS = int(os.getenv("RGMIS_WORKERS", "1"))
    CHUNK_SIZE = int(os.getenv("RGMIS_CHUNK_SIZE", "2000"))

    DEFAULT_SEED = int(os.getenv("RGMIS_DEFAULT_SEED", "0"))
    DEFAULT_TRIALS = int(os.getenv("RGMIS_DEFAULT_TRIALS", "1000"))

    # Statistical slack for Monte Carlo verdicts, in standard errors
    MC_BOUND_SIGMAS = 3
    MC_CALIBRATION_SIGMAS = 4

    REPORT_FORMATS = ("json", "csv", "table")

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def validate(cls):
        import logging as _logging
        _log = _logging.getLogger(__name__)
        if cls.EXHAUSTIVE_BOUND > 10:
            _log.warning(
                "RGMIS_EXHAUSTIVE_BOUND=%s: exact modes enumerate n! permutations "
                "and will take hours above n=10.",
                cls.EXHAUSTIVE_BOUND,
            )
        if cls.WORKERS < 1:
            _log.warning("RGMIS_WORKERS=%s is below 1; running serially.", cls.WORKERS)
        return True

    @classmethod
    def get_workers(cls):
        return max(1, cls.WORKERS)
