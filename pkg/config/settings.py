"""
Configuration settings for the ARKC stabilized integrator library
"""
from pydantic_settings import BaseSettings
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Library and CLI settings loaded from environment variables (ARKC_ prefix)"""

    # Integrator defaults
    DEFAULT_TOL: float = 1e-2
    INITIAL_STEP: float = 1e-3
    SAFETY_FACTOR: float = 0.8
    MIN_STEP_FACTOR: float = 0.1
    MAX_STEP_FACTOR: float = 10.0
    MAX_STEPS: int = 100000
    SPECTRAL_REFRESH_INTERVAL: int = 25

    # Coefficient generation
    COEFF_CACHE_SIZE: int = 4096

    # Reference oracle
    REFERENCE_TOL: float = 1e-11
    REFERENCE_MAX_EVALS: int = 5_000_000

    # Output Configuration
    REPORTS_PATH: str = "reports"
    DEFAULT_FORMAT: str = "csv"

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""

    # Randomised property drivers
    DEFAULT_SEED: int = 2024

    model_config = {"env_file": ".env", "case_sensitive": True, "env_prefix": "ARKC_",
                    "extra": "ignore"}


# Global settings instance
settings = Settings()
