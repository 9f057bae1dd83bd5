/**
 * One-shot extraction passes: dense patch features (WRZF) and perceptual
 * layer differences (WRZL), with JSON manifests recording what produced
 * every file.
 */

import * as fs from 'node:fs'
import * as path from 'node:path'
import {
  BridgeNetwork,
  FEATURE_DIM,
  createNetwork,
  disposeNetwork,
  patchFeatures,
  perceptualDiffs,
} from './backbone.js'
import { listPngs, readImagePng, stem } from './images.js'
import { writeFeatureFile, writeLayerDiffFile } from './wrz.js'

export interface FeatureManifest {
  backbone: string
  seed: number
  patch_size: number
  dim: number
  normalization: 'l2'
  frames: { image: string; output: string; grid: [number, number] }[]
}

export interface DiffManifest {
  backbone: string
  seed: number
  layers: number
  layer_weights: 'baked'
  frames: {
    observed: string
    rendered: string
    output: string
    reference_distance: number
  }[]
}

export interface ExtractOptions {
  backbone?: string
  seed?: number
}

function ensureDir(dir: string): void {
  fs.mkdirSync(dir, { recursive: true })
}

function writeManifest(outDir: string, manifest: FeatureManifest | DiffManifest): void {
  fs.writeFileSync(path.join(outDir, 'manifest.json'), JSON.stringify(manifest, null, 2) + '\n')
}

/** Extract L2-normalized patch features for every PNG in a directory. */
export function extractPatchFeatures(
  imageDir: string,
  outDir: string,
  patchSize: number,
  options: ExtractOptions = {},
): FeatureManifest {
  const images = listPngs(imageDir)
  if (images.length === 0) {
    throw new Error(`no PNG images in ${imageDir}`)
  }
  ensureDir(outDir)
  const net = createNetwork(options.backbone, options.seed)
  try {
    const manifest: FeatureManifest = {
      backbone: net.id,
      seed: net.seed,
      patch_size: patchSize,
      dim: FEATURE_DIM,
      normalization: 'l2',
      frames: [],
    }
    for (const file of images) {
      const grid = patchFeatures(net, readImagePng(file), patchSize)
      const output = path.join(outDir, `${stem(file)}.wrzf`)
      writeFeatureFile(output, grid)
      manifest.frames.push({ image: file, output, grid: [grid.h, grid.w] })
    }
    writeManifest(outDir, manifest)
    return manifest
  } finally {
    disposeNetwork(net)
  }
}

function pairFrames(observedDir: string, renderedDir: string): [string, string][] {
  const observed = new Map(listPngs(observedDir).map((f) => [stem(f), f]))
  const rendered = new Map(listPngs(renderedDir).map((f) => [stem(f), f]))
  const missing = [...observed.keys()].filter((s) => !rendered.has(s))
  const extra = [...rendered.keys()].filter((s) => !observed.has(s))
  if (missing.length || extra.length) {
    throw new Error(
      `frame pairing mismatch; rendered is missing [${missing.join(', ')}], ` +
        `rendered has extra [${extra.join(', ')}]`,
    )
  }
  if (observed.size === 0) {
    throw new Error(`no PNG pairs between ${observedDir} and ${renderedDir}`)
  }
  return [...observed.keys()].sort().map((s) => [observed.get(s)!, rendered.get(s)!])
}

/**
 * Extract per-pair perceptual difference layer stacks.
 *
 * Layer weights are baked into the maps, so a downstream unweighted
 * layer-sum of masked means reproduces the reference scalar recorded in the
 * manifest when the mask is all-ones.
 */
export function extractLpipsDiffs(
  observedDir: string,
  renderedDir: string,
  outDir: string,
  options: ExtractOptions = {},
): DiffManifest {
  const pairs = pairFrames(observedDir, renderedDir)
  ensureDir(outDir)
  const net = createNetwork(options.backbone, options.seed)
  try {
    const manifest: DiffManifest = {
      backbone: net.id,
      seed: net.seed,
      layers: net.pyramid.length,
      layer_weights: 'baked',
      frames: [],
    }
    for (const [obsFile, renFile] of pairs) {
      const result = perceptualDiffs(net, readImagePng(obsFile), readImagePng(renFile))
      const output = path.join(outDir, `${stem(obsFile)}.wrzl`)
      writeLayerDiffFile(output, result.layers)
      manifest.frames.push({
        observed: obsFile,
        rendered: renFile,
        output,
        reference_distance: result.reference,
      })
    }
    writeManifest(outDir, manifest)
    return manifest
  } finally {
    disposeNetwork(net)
  }
}
