from .architecture import ArchitectureConfig
from .checkpoint import GwaeCheckpoint
from .gwae import (
    DecoderOutput,
    LatentCode,
    decode,
    decode_batch,
    decode_realisation,
    encode,
    encode_features,
    reparameterize,
)
from .layers import ConvStructure, GraphConvLayer, graph_conv_forward
from .losses import gaussian_nll, mmd, wae_loss
from .network import build_plan, decoder_forward, encoder_forward
from .training import TrainingConfig, dataset_features, train
