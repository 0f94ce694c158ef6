from .instance import InstanceMapper, get_instance_mapper
from .dataset import DatasetMapper, get_dataset_mapper
from .result import ResultMapper, get_result_mapper, summarize
