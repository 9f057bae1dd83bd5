/**
 * Deterministic convolutional backbone + perceptual-difference network.
 *
 * No downloadable checkpoints ship with this bridge: the "bundled-v1"
 * backbone generates its weights from a fixed seed, so inference is
 * bit-reproducible across runs and machines while exercising the exact
 * extraction contracts (patch grids, L2 normalization, per-layer spatial
 * difference maps with the layer weights baked in).  The manifest records
 * which backbone produced every file.
 */

import * as tf from '@tensorflow/tfjs'
import type { RgbImage } from './images.js'
import type { FeatureGrid, LayerDiff } from './wrz.js'

export const FEATURE_DIM = 64

interface ConvLayer {
  kernel: tf.Tensor4D
  bias: tf.Tensor1D
  stride: number
}

export interface BridgeNetwork {
  id: string
  seed: number
  /** pyramid convolutions; layer l output has stride 2^l */
  pyramid: ConvLayer[]
  /** 1x1 projection applied to the stride-4 feature map for patch features */
  projection: ConvLayer
  /** non-negative channel weights per pyramid layer (LPIPS-style, baked) */
  layerWeights: Float32Array[]
}

/** Deterministic PRNG (mulberry32) so weights are a pure function of seed. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

function normalArray(rand: () => number, count: number, std: number): Float32Array {
  const out = new Float32Array(count)
  for (let i = 0; i < count; i += 2) {
    const u = Math.max(rand(), 1e-12)
    const v = rand()
    const r = Math.sqrt(-2 * Math.log(u))
    out[i] = r * Math.cos(2 * Math.PI * v) * std
    if (i + 1 < count) {
      out[i + 1] = r * Math.sin(2 * Math.PI * v) * std
    }
  }
  return out
}

function makeConv(
  rand: () => number,
  kh: number,
  kw: number,
  cin: number,
  cout: number,
  stride: number,
): ConvLayer {
  const std = Math.sqrt(2 / (kh * kw * cin))
  const kernel = tf.tensor4d(normalArray(rand, kh * kw * cin * cout, std), [kh, kw, cin, cout])
  const bias = tf.tensor1d(new Float32Array(cout))
  return { kernel, bias, stride }
}

const PYRAMID_CHANNELS = [8, 16, 32, 64]

export function createNetwork(backbone = 'bundled-v1', seed = 20240101): BridgeNetwork {
  if (backbone !== 'bundled-v1') {
    throw new Error(`unknown backbone "${backbone}" (available: bundled-v1)`)
  }
  const rand = mulberry32(seed)
  const pyramid: ConvLayer[] = []
  let cin = 3
  for (let l = 0; l < PYRAMID_CHANNELS.length; l++) {
    pyramid.push(makeConv(rand, 3, 3, cin, PYRAMID_CHANNELS[l], l === 0 ? 1 : 2))
    cin = PYRAMID_CHANNELS[l]
  }
  const projection = makeConv(rand, 1, 1, PYRAMID_CHANNELS[2], FEATURE_DIM, 1)
  const layerWeights = PYRAMID_CHANNELS.map((channels) => {
    const w = new Float32Array(channels)
    for (let c = 0; c < channels; c++) {
      w[c] = (0.5 + rand()) / channels // positive, mean ~1/C per channel
    }
    return w
  })
  return { id: backbone, seed, pyramid, projection, layerWeights }
}

function toTensor(image: RgbImage): tf.Tensor4D {
  return tf.tensor4d(image.data, [1, image.height, image.width, 3])
}

function forwardPyramid(net: BridgeNetwork, input: tf.Tensor4D): tf.Tensor4D[] {
  const outputs: tf.Tensor4D[] = []
  let x = input
  for (const layer of net.pyramid) {
    x = tf.relu(
      tf.add(tf.conv2d(x, layer.kernel, layer.stride, 'same'), layer.bias),
    ) as tf.Tensor4D
    outputs.push(x)
  }
  return outputs
}

/**
 * Dense patch features on the (H/patchSize, W/patchSize) grid, L2-normalized.
 *
 * The stride-4 pyramid stage is average-pooled to the patch grid and passed
 * through a 1x1 projection; image dims must be divisible by patchSize and
 * patchSize by 4.
 */
export function patchFeatures(
  net: BridgeNetwork,
  image: RgbImage,
  patchSize: number,
): FeatureGrid {
  if (patchSize % 4 !== 0 || patchSize < 4) {
    throw new Error(`patch size must be a positive multiple of 4, got ${patchSize}`)
  }
  if (image.height % patchSize !== 0 || image.width % patchSize !== 0) {
    throw new Error(
      `image ${image.height}x${image.width} not divisible by patch size ${patchSize}`,
    )
  }
  const h = image.height / patchSize
  const w = image.width / patchSize
  const data = tf.tidy(() => {
    const stride4 = forwardPyramid(net, toTensor(image))[2]
    const pool = patchSize / 4
    const pooled = tf.avgPool(stride4, pool, pool, 'valid')
    const projected = tf.add(
      tf.conv2d(pooled, net.projection.kernel, 1, 'same'),
      net.projection.bias,
    )
    const norm = tf.sqrt(tf.sum(tf.square(projected), -1, true))
    const unit = tf.div(projected, tf.maximum(norm, 1e-12))
    return unit.dataSync() as Float32Array
  })
  return { h, w, d: FEATURE_DIM, data: Float32Array.from(data) }
}

export interface PerceptualResult {
  layers: LayerDiff[]
  /** sum over layers of the spatial mean of each difference map */
  reference: number
}

/**
 * Spatial perceptual difference maps between two images.
 *
 * Per layer: channel-unit-normalize both feature maps, take the squared
 * difference, and contract channels with the layer's baked weights.  The
 * reference scalar is the unweighted sum over layers of each map's spatial
 * mean, matching a full-mask masked perceptual distance downstream.
 */
export function perceptualDiffs(
  net: BridgeNetwork,
  observed: RgbImage,
  rendered: RgbImage,
): PerceptualResult {
  if (observed.height !== rendered.height || observed.width !== rendered.width) {
    throw new Error('observed/rendered image sizes differ')
  }
  const layerArrays = tf.tidy(() => {
    const fa = forwardPyramid(net, toTensor(observed))
    const fb = forwardPyramid(net, toTensor(rendered))
    return fa.map((a, l) => {
      const unitA = tf.div(a, tf.maximum(tf.sqrt(tf.sum(tf.square(a), -1, true)), 1e-10))
      const unitB = tf.div(fb[l], tf.maximum(tf.sqrt(tf.sum(tf.square(fb[l]), -1, true)), 1e-10))
      const sq = tf.square(tf.sub(unitA, unitB))
      const weights = tf.tensor1d(net.layerWeights[l])
      const weighted = tf.sum(tf.mul(sq, weights), -1) as tf.Tensor3D
      return {
        height: weighted.shape[1],
        width: weighted.shape[2],
        data: Float32Array.from(weighted.dataSync() as Float32Array),
      }
    })
  })
  // Reference from the exact float32 values that get serialized.
  let reference = 0
  for (const layer of layerArrays) {
    let total = 0
    for (let i = 0; i < layer.data.length; i++) {
      total += layer.data[i]
    }
    reference += total / layer.data.length
  }
  return { layers: layerArrays, reference }
}

export function disposeNetwork(net: BridgeNetwork): void {
  for (const layer of [...net.pyramid, net.projection]) {
    layer.kernel.dispose()
    layer.bias.dispose()
  }
}
