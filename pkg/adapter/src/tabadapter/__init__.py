"""tabadapter: boundary tool between segmentation models / external
annotation formats and the tabrec detection JSON contract."""

from .config import AdapterConfig, CONTRACT_CLASSES
from .convert import ConversionResult, convert_annotations, xywh_to_xyxy
from .infer import InferenceResult, run_inference

__all__ = [
    "AdapterConfig", "CONTRACT_CLASSES", "ConversionResult", "InferenceResult",
    "convert_annotations", "run_inference", "xywh_to_xyxy",
]

__version__ = "0.1.0"
