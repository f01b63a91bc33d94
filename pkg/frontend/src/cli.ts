/** Command line: render figures from a run output directory.
 *
 *   node dist/cli.js <overview|density|density-change> <run-dir> [options]
 *     -o, --out <file>    output SVG path (default: <kind>.svg in run dir)
 *     -t, --time <fs>     snapshot time for density figures
 */

import { writeFileSync } from "fs"
import { join } from "path"
import { parseArgs } from "util"
import { figureKinds, renderByKind } from "./figures.js"

export function main(argv: string[]): number {
    let parsed
    try {
        parsed = parseArgs({
            args: argv,
            allowPositionals: true,
            options: {
                out: { type: "string", short: "o" },
                time: { type: "string", short: "t" },
            },
        })
    } catch (err) {
        console.error(String(err instanceof Error ? err.message : err))
        return 2
    }
    const [kind, runDir] = parsed.positionals
    if (!kind || !runDir) {
        console.error(`usage: cli.js <${figureKinds().join("|")}> <run-dir> [-o out.svg] [-t time_fs]`)
        return 2
    }
    let timeFs: number | undefined
    if (parsed.values.time !== undefined) {
        timeFs = Number(parsed.values.time)
        if (!Number.isFinite(timeFs)) {
            console.error(`invalid --time value: '${parsed.values.time}'`)
            return 2
        }
    }
    try {
        const svg = renderByKind(kind, runDir, timeFs)
        const out = parsed.values.out ?? join(runDir, `${kind}.svg`)
        writeFileSync(out, svg)
        console.log(`wrote ${out}`)
        return 0
    } catch (err) {
        console.error(String(err instanceof Error ? err.message : err))
        return 1
    }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
    process.exit(main(process.argv.slice(2)))
}
