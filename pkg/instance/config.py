import os
from dotenv import load_dotenv

load_dotenv()

class Config(object):
    """ Parent configuration class."""
    DEBUG = False
    TESTING = False
    LOG_LEVEL = os.getenv("HMIWLAN_LOG_LEVEL", "INFO")
    OUT_DIR = os.getenv("HMIWLAN_OUT_DIR", "out")
    THREADS = int(os.getenv("HMIWLAN_THREADS", "1"))
    SEED = int(os.getenv("HMIWLAN_SEED", "1"))

class DevelopmentConfig(Config):
    """Configurations for Development"""
    DEBUG = True
    LOG_LEVEL = os.getenv("HMIWLAN_LOG_LEVEL", "DEBUG")

class TestingConfig(Config):
    """Configurations for Testing, with a scratch output directory"""
    TESTING = True
    DEBUG = True
    LOG_LEVEL = os.getenv("HMIWLAN_LOG_LEVEL", "WARNING")
    OUT_DIR = os.getenv("HMIWLAN_TEST_OUT_DIR", "out-test")

class ProductionConfig(Config):
    """Configurations for Production."""
    DEBUG = False
    TESTING = False

app_config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
}
