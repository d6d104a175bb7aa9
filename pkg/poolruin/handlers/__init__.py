from poolruin.handlers.atomic import atomic_write
from poolruin.handlers.csv_handler import CsvHandler
from poolruin.handlers.io_handlers import read_mapping, write_mapping
from poolruin.handlers.json_handler import JsonHandler
from poolruin.handlers.yaml_handler import YamlHandler

__all__ = ["CsvHandler", "JsonHandler", "YamlHandler", "atomic_write", "read_mapping", "write_mapping"]
