export {
  FEATURE_DIM,
  createNetwork,
  disposeNetwork,
  patchFeatures,
  perceptualDiffs,
} from './backbone.js'
export type { BridgeNetwork, PerceptualResult } from './backbone.js'
export { extractLpipsDiffs, extractPatchFeatures } from './extract.js'
export type { DiffManifest, ExtractOptions, FeatureManifest } from './extract.js'
export { listPngs, readImagePng, stem, writeFullMaskPng, writeImagePng } from './images.js'
export type { RgbImage } from './images.js'
export {
  encodeFeatureFile,
  encodeLayerDiffFile,
  readFeatureFile,
  readLayerDiffFile,
  writeFeatureFile,
  writeLayerDiffFile,
} from './wrz.js'
export type { FeatureGrid, LayerDiff } from './wrz.js'
