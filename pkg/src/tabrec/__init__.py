"""tabrec: table structure recovery, document-image augmentation transforms,
detection evaluation protocols, and a deterministic synthetic-page oracle."""

from .config import PipelineConfig, load_config
from .detections import (DetectionInstance, GroundTruthPage, PageDetections,
                         assign_cells, filter_by_score, parse_detections,
                         parse_ground_truth, serialize_detections,
                         serialize_ground_truth)
from .raster import (BBox, BinaryImage, Component, DistanceField, GrayImage,
                     binarize, connected_components, dilate_binary,
                     distance_transform, iou, text_regions)
from .structure import StructureCell, TableStructure
from .transforms import ColorImage, SmudgeParams, augment_corpus, dilation_transform, smudge_transform

__all__ = [
    "BBox", "BinaryImage", "ColorImage", "Component", "DetectionInstance",
    "DistanceField", "GrayImage", "GroundTruthPage", "PageDetections",
    "PipelineConfig", "SmudgeParams", "StructureCell", "TableStructure",
    "assign_cells", "augment_corpus", "binarize", "connected_components",
    "dilate_binary", "dilation_transform", "distance_transform",
    "filter_by_score", "iou", "load_config", "parse_detections",
    "parse_ground_truth", "serialize_detections", "serialize_ground_truth",
    "smudge_transform", "text_regions",
]

__version__ = "0.1.0"
