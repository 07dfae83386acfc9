import os
from dotenv import load_dotenv

load_dotenv()

config = {
    'threads': int(os.getenv('X0N_THREADS', 1)),
    'log_level': os.getenv('X0N_LOG_LEVEL', 'WARNING'),
    'series_order': int(os.getenv('X0N_SERIES_ORDER', 60)),
    'eisenstein_bound': int(os.getenv('X0N_EISENSTEIN_BOUND', 400)),
    'quad_nodes': int(os.getenv('X0N_QUAD_NODES', 40)),
    'output_format': os.getenv('X0N_OUTPUT_FORMAT', 'json'),
}
