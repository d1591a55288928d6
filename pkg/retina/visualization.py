import plotly.express as px
import plotly.graph_objects as go
import pandas as pd


def create_mse_histogram(mse_table):
    """Create a histogram of per-image MSE for each method"""
    long = mse_table.melt(
        id_vars=["image_id"], value_vars=[c for c in mse_table.columns if c.startswith("mse_")],
        var_name="method", value_name="MSE",
    )
    long["method"] = long["method"].str.replace("mse_", "", regex=False)
    fig = px.histogram(long, x="MSE", color="method", barmode="overlay", nbins=30,
                       title="MSE against the original image")
    fig.update_traces(opacity=0.6)
    return fig


def create_error_curves(curves):
    """Create validation/testing error curves per model"""
    fig = go.Figure()
    for model, group in curves.groupby("model", sort=True):
        fig.add_trace(go.Scatter(x=group["epoch"], y=group["v_error"], mode="lines",
                                 name=f"{model} validation"))
        fig.add_trace(go.Scatter(x=group["epoch"], y=group["t_error"], mode="lines",
                                 name=f"{model} testing", line={"dash": "dash"}))
    fig.update_layout(title="Error per epoch", xaxis_title="Epoch", yaxis_title="Error (%)")
    return fig


def create_regime_bars(metrics):
    """Create a grouped bar chart of accuracy before and after enhancement"""
    df = metrics[metrics["dataset"] == "ALL"]
    fig = px.bar(df, x="model", y="accuracy", color="regime", barmode="group", text="accuracy",
                 title="Accuracy before and after enhancement")
    fig.update_traces(texttemplate="%{text:.2f}")
    fig.update_layout(yaxis_range=[0, 100])
    return fig


def create_t_final_chart(t_final):
    """Create a bar chart of the structuring-element count chosen per image"""
    counts = pd.Series(t_final, dtype=int).value_counts().sort_index()
    df = pd.DataFrame({"t_final": counts.index, "images": counts.values})
    return px.bar(df, x="t_final", y="images", title="Dynamic structuring element depth")


def write_figure(fig, path):
    # Fixed div id keeps reruns byte-identical
    fig.write_html(str(path), include_plotlyjs="cdn", full_html=True, div_id="figure")
