import os
from dotenv import load_dotenv

load_dotenv()


class Settings:
    DEFAULT_THREADS: int = int(os.getenv("WORKBENCH_THREADS", "1"))
    LOG_LEVEL: str = os.getenv("WORKBENCH_LOG_LEVEL", "INFO")
    OUTPUT_FORMAT: str = os.getenv("WORKBENCH_OUTPUT_FORMAT", "json")
    COEF_CACHE_SIZE: int = int(os.getenv("WORKBENCH_COEF_CACHE_SIZE", "8"))


settings = Settings()
