import * as echarts from "echarts";
import type { EChartsOption } from "echarts";

export const WIDTH = 900;
export const HEIGHT = 560;

/** Server-side render to an SVG string; no DOM, no timestamps. */
export function renderSvg(option: EChartsOption): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  try {
    chart.setOption(option);
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}
