"""
File formats: PFM and PNG codecs, the dataset layout and reconstruction outputs.
"""
from .pfm import read_pfm, write_pfm
from .dataset_io import load_dataset, load_manifest, write_dataset
from .results import load_results, mesh_from_depth, save_results
