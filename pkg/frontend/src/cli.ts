#!/usr/bin/env node
/**
 * wildsieve-bridge: extract WRZF patch features / WRZL perceptual diffs.
 *
 *   wildsieve-bridge features --images DIR --out DIR [--patch-size 16]
 *                            [--backbone bundled-v1] [--seed N]
 *   wildsieve-bridge lpips --observed DIR --rendered DIR --out DIR
 *                          [--backbone bundled-v1] [--seed N]
 *
 * Exit codes: 0 success, 1 validation/model error, 2 I/O error.
 */

import { extractLpipsDiffs, extractPatchFeatures } from './extract.js'

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>()
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i]
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new UsageError(`malformed arguments near "${key}"`)
    }
    flags.set(key.slice(2), argv[i + 1])
  }
  return flags
}

class UsageError extends Error {}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name)
  if (value === undefined) {
    throw new UsageError(`missing required flag --${name}`)
  }
  return value
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv
  try {
    const flags = parseFlags(rest)
    const options = {
      backbone: flags.get('backbone'),
      seed: flags.has('seed') ? Number(flags.get('seed')) : undefined,
    }
    if (command === 'features') {
      const manifest = extractPatchFeatures(
        required(flags, 'images'),
        required(flags, 'out'),
        flags.has('patch-size') ? Number(flags.get('patch-size')) : 16,
        options,
      )
      console.log(`wrote ${manifest.frames.length} WRZF files (backbone ${manifest.backbone})`)
      return 0
    }
    if (command === 'lpips') {
      const manifest = extractLpipsDiffs(
        required(flags, 'observed'),
        required(flags, 'rendered'),
        required(flags, 'out'),
        options,
      )
      console.log(`wrote ${manifest.frames.length} WRZL files (backbone ${manifest.backbone})`)
      return 0
    }
    throw new UsageError(`unknown command "${command ?? ''}" (use: features | lpips)`)
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err)
    console.error(`wildsieve-bridge: ${message}`)
    if (err && typeof err === 'object' && 'code' in err) {
      return 2 // filesystem errors carry a code (ENOENT, EACCES, ...)
    }
    return 1
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split('/').pop()!)
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)))
}
