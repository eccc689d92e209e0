import logging
import os

from dotenv import load_dotenv
from instance.config import app_config

load_dotenv()

__version__ = "1.0.0"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Toolkit(object):
    """Holds the resolved process settings and the package logger."""

    def __init__(self, name):
        self.name = name
        self.config = {}
        self.logger = logging.getLogger(name)

    def from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self.config[key] = getattr(obj, key)

    def __repr__(self):
        return "<Toolkit: {}>".format(self.name)


def create_app(config_name=None):
    config_name = config_name or os.environ.get("HMIWLAN_SETTINGS", "production")
    if config_name not in app_config:
        from hmiwlan.errors import ConfigError
        raise ConfigError("unknown settings profile '{}'".format(config_name))
    app = Toolkit(__name__)
    app.from_object(app_config[config_name])

    level = logging.getLevelName(str(app.config["LOG_LEVEL"]).upper())
    if not isinstance(level, int):
        level = logging.INFO
    app.logger.setLevel(level)
    if not any(getattr(h, "_hmiwlan", False) for h in app.logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._hmiwlan = True
        app.logger.addHandler(handler)
    return app
