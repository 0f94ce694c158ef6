from app.core.config import settings
from app.core.biz_constants import *
from app.core import path_conf
