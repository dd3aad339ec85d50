double control(double y1, double y2){
  if (-1 <= y1 && y1 <= -0.5){
    if (y2 > 0){
        u = 4 * y1 - 6;
    }else{
        u = 0;
    }
  }else{
    u = -4 * y1 - 6;
  }
  return u;
}
