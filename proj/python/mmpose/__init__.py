# Copyright 2026, mmpose authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Radar point-cloud skeletal pose estimation."""

from ._core import (
    BoundsError,
    DomainError,
    FormatError,
    Model,
    ParseError,
    SchemaError,
    StructuralError,
    TruncationError,
    VersionError,
    beat_frequency,
    cli,
    conv2d_param_count,
    decode_image,
    detect,
    encode_frame,
    evaluate,
    load_dataset,
    range_resolution,
    simulate,
    total_parameter_count,
    velocity_resolution,
    voxel_dimension,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
