from app.model.entity import *
from app.model.common import *
