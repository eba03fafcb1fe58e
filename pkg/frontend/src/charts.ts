// Hand-rolled SVG charts.  Every plotted value comes verbatim from a service
// response field; the chart layer only maps values to pixels.

const NS = 'http://www.w3.org/2000/svg'

export interface Series {
  label: string
  values: number[]
  color: string
  dashed?: boolean
}

export interface Band {
  low: number[]
  high: number[]
  color: string
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(NS, tag)
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v))
  return node
}

export interface ChartOptions {
  width?: number
  height?: number
  xLabels?: string[]
  band?: Band
  title?: string
}

interface Frame {
  svg: SVGSVGElement
  x: (i: number) => number
  y: (v: number) => number
  lo: number
  hi: number
  plotW: number
  plotH: number
  margin: { left: number; top: number; right: number; bottom: number }
}

function frame(allValues: number[], n: number, opts: ChartOptions): Frame {
  const width = opts.width ?? 640
  const height = opts.height ?? 240
  const margin = { left: 52, top: opts.title ? 26 : 12, right: 12, bottom: 30 }
  const plotW = width - margin.left - margin.right
  const plotH = height - margin.top - margin.bottom
  let lo = Math.min(...allValues)
  let hi = Math.max(...allValues)
  if (!isFinite(lo) || !isFinite(hi)) {
    lo = 0
    hi = 1
  }
  if (lo === hi) {
    lo -= 1
    hi += 1
  }
  const pad = (hi - lo) * 0.06
  lo -= pad
  hi += pad
  const svg = el('svg', { width, height, viewBox: `0 0 ${width} ${height}`, class: 'chart' })
  const x = (i: number) => margin.left + (n <= 1 ? plotW / 2 : (i / (n - 1)) * plotW)
  const y = (v: number) => margin.top + plotH - ((v - lo) / (hi - lo)) * plotH
  return { svg, x, y, lo, hi, plotW, plotH, margin }
}

function axes(f: Frame, opts: ChartOptions, n: number): void {
  const { svg, margin, plotW, plotH, lo, hi } = f
  svg.appendChild(
    el('line', {
      x1: margin.left, y1: margin.top + plotH, x2: margin.left + plotW, y2: margin.top + plotH,
      class: 'axis',
    }),
  )
  svg.appendChild(
    el('line', { x1: margin.left, y1: margin.top, x2: margin.left, y2: margin.top + plotH, class: 'axis' }),
  )
  for (const frac of [0, 0.5, 1]) {
    const v = lo + (hi - lo) * frac
    const ty = f.y(v)
    const label = el('text', { x: margin.left - 6, y: ty + 4, class: 'tick', 'text-anchor': 'end' })
    label.textContent = Math.abs(v) >= 1000 ? v.toFixed(0) : v.toPrecision(3)
    svg.appendChild(label)
  }
  if (opts.xLabels && opts.xLabels.length) {
    const picks = [0, Math.floor((n - 1) / 2), n - 1].filter((i, k, arr) => arr.indexOf(i) === k)
    for (const i of picks) {
      const label = el('text', {
        x: f.x(i), y: margin.top + plotH + 18, class: 'tick', 'text-anchor': 'middle',
      })
      label.textContent = opts.xLabels[Math.min(i, opts.xLabels.length - 1)]
      svg.appendChild(label)
    }
  }
  if (opts.title) {
    const t = el('text', { x: margin.left, y: 16, class: 'chart-title' })
    t.textContent = opts.title
    svg.appendChild(t)
  }
}

function polyline(f: Frame, values: number[], color: string, dashed: boolean): SVGPolylineElement {
  const pts = values.map((v, i) => `${f.x(i)},${f.y(v)}`).join(' ')
  const line = el('polyline', { points: pts, fill: 'none', stroke: color, 'stroke-width': 1.8 })
  if (dashed) line.setAttribute('stroke-dasharray', '5,4')
  return line
}

/** Multi-series line chart; values are plotted exactly as given. */
export function lineChart(series: Series[], opts: ChartOptions = {}): SVGSVGElement {
  const n = Math.max(...series.map((s) => s.values.length), 0)
  const all = series.flatMap((s) => s.values)
  if (opts.band) all.push(...opts.band.low, ...opts.band.high)
  const f = frame(all, n, opts)
  axes(f, opts, n)
  if (opts.band) {
    const up = opts.band.high.map((v, i) => `${f.x(i)},${f.y(v)}`)
    const down = opts.band.low.map((v, i) => `${f.x(i)},${f.y(v)}`).reverse()
    const area = el('polygon', {
      points: [...up, ...down].join(' '),
      fill: opts.band.color,
      opacity: 0.25,
      stroke: 'none',
    })
    f.svg.appendChild(area)
  }
  for (const s of series) {
    const line = polyline(f, s.values, s.color, Boolean(s.dashed))
    line.dataset.series = s.label
    f.svg.appendChild(line)
  }
  return f.svg
}

/** Bar chart for per-day deltas; bars carry their value in data-value. */
export function deltaBars(values: number[], opts: ChartOptions = {}): SVGSVGElement {
  const all = [...values, 0]
  const f = frame(all, values.length, opts)
  axes(f, opts, values.length)
  const zero = f.y(0)
  const barW = Math.max(2, (f.plotW / Math.max(values.length, 1)) * 0.7)
  values.forEach((v, i) => {
    const top = Math.min(f.y(v), zero)
    const h = Math.max(Math.abs(f.y(v) - zero), 0.5)
    const bar = el('rect', {
      x: f.x(i) - barW / 2, y: top, width: barW, height: h,
      class: v >= 0 ? 'bar-up' : 'bar-down',
    })
    bar.dataset.value = String(v)
    f.svg.appendChild(bar)
  })
  f.svg.appendChild(el('line', { x1: f.margin.left, y1: zero, x2: f.margin.left + f.plotW, y2: zero, class: 'axis' }))
  return f.svg
}

export const RUN_COLORS = ['#2563eb', '#d97706', '#059669', '#dc2626', '#7c3aed']
export const MAX_OVERLAYS = 5
